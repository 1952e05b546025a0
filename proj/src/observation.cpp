#include "lowalt/observation.hpp"

#include "lowalt/errors.hpp"

namespace lowalt {

namespace {

void put_rect_norm(Eigen::VectorXd& o, int& k, const Rect& r,
                   const ObservationScales& sc) {
  o[k++] = r.x / sc.area_x;
  o[k++] = r.y / sc.area_y;
  o[k++] = r.w / sc.area_x;
  o[k++] = r.h / sc.area_y;
}

}  // namespace

Eigen::VectorXd encode_observation(const Scenario& s,
                                   const std::vector<GeRuntime>& ges,
                                   const UavState& uav, double energy_remaining,
                                   double last_td,
                                   const std::vector<VisibleOu>& visible,
                                   const ObservationLayout& layout,
                                   const ObservationScales& sc) {
  if (static_cast<int>(ges.size()) > layout.max_ge)
    throw ShapeMismatch("more ground elements than the layout allows");
  if (static_cast<int>(s.nfz.size()) > layout.max_zone ||
      static_cast<int>(s.rz.size()) > layout.max_zone ||
      static_cast<int>(s.bz.size()) > layout.max_zone)
    throw ShapeMismatch("more zones than the layout allows");

  Eigen::VectorXd o = Eigen::VectorXd::Zero(layout.total_dim());
  int k = 0;

  for (int i = 0; i < layout.max_ge; ++i) {
    if (i < static_cast<int>(ges.size())) {
      o[k] = ges[i].spec.pos.x() / sc.area_x;
      o[k + 1] = ges[i].spec.pos.y() / sc.area_y;
      o[k + 2] = ges[i].remaining / sc.dv_max;
    }
    k += ObservationLayout::kGeFeatures;
  }

  for (const auto* zones : {&s.nfz, &s.rz, &s.bz}) {
    for (int i = 0; i < layout.max_zone; ++i) {
      if (i < static_cast<int>(zones->size())) {
        put_rect_norm(o, k, (*zones)[i], sc);
      } else {
        k += ObservationLayout::kZoneFeatures;
      }
    }
  }

  // Visible obstacle users arrive nearest first; relative offsets scale by
  // the perception range so every entry stays within [-1, 1].
  const int n_ou = std::min<int>(layout.max_ou, static_cast<int>(visible.size()));
  for (int i = 0; i < n_ou; ++i) {
    o[k] = (visible[i].pos.x() - uav.pos.x()) / sc.perception;
    o[k + 1] = (visible[i].pos.y() - uav.pos.y()) / sc.perception;
    o[k + 2] = visible[i].vel.x() / sc.v_max;
    o[k + 3] = visible[i].vel.y() / sc.v_max;
    k += ObservationLayout::kOuFeatures;
  }
  k += (layout.max_ou - n_ou) * ObservationLayout::kOuFeatures;

  o[k++] = uav.pos.x() / sc.area_x;
  o[k++] = uav.pos.y() / sc.area_y;
  o[k++] = uav.vel.x() / sc.v_max;
  o[k++] = uav.vel.y() / sc.v_max;
  o[k++] = energy_remaining / sc.e_total;
  o[k++] = last_td / sc.td_cap;
  put_rect_norm(o, k, s.take_off, sc);
  put_rect_norm(o, k, s.landing, sc);

  return o;
}

}  // namespace lowalt
