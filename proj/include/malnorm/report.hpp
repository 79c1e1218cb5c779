#pragma once

#include <string>

#include "malnorm/construction.hpp"
#include "malnorm/expanders.hpp"
#include "malnorm/experiments/json_text.hpp"
#include "malnorm/malnormality.hpp"
#include "malnorm/selftest.hpp"

namespace malnorm {

inline Json to_json(const MalResult& r, std::size_t n) {
  return Json{{"converged", r.converged},
              {"flavor", std::string(to_string(r.flavor))},
              {"iterations", r.iterations},
              {"lambda1", r.lambda1},
              {"n", n},
              {"residual", r.residual},
              {"solver", std::string(to_string(r.solver))},
              {"value", r.value}};
}

inline Json to_json(const ConstructionCertificate& c) {
  return Json{{"delta", c.delta},
              {"flavor", std::string(to_string(c.flavor))},
              {"mal_X", c.mal_X},
              {"mal_scaled", c.mal_scaled},
              {"n", c.n},
              {"resolution", c.resolution},
              {"solver", std::string(to_string(c.solver))},
              {"status", std::string(to_string(c.status))},
              {"x_opnorm", c.x_opnorm}};
}

inline Json to_json(const ExpanderReport& r) {
  Json j{{"edge_delta", r.edge_delta}, {"k", r.k},           {"lambda_upper", r.lambda_upper},
         {"n", r.n},                   {"norm_E", r.norm_E}, {"norm_Eh", r.norm_Eh}};
  j["hastings_threshold"] = r.hastings_threshold ? Json(*r.hastings_threshold) : Json(nullptr);
  return j;
}

inline Json to_json(const CheckResult& c) {
  return Json{{"instances", c.instances}, {"name", c.name}, {"pass", c.pass},
              {"tolerance", c.tolerance}, {"worst", c.worst}};
}

}  // namespace malnorm
