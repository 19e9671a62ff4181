/*
 * Copyright 2026 The solarcast Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef SOLARCAST_ENGINES_FACTORY_HPP_
#define SOLARCAST_ENGINES_FACTORY_HPP_

#include <memory>
#include <string_view>

#include "solarcast/engines/engine.hpp"
#include "solarcast/engines/parametric.hpp"
#include "solarcast/engines/quantile_linear.hpp"
#include "solarcast/engines/quantile_net.hpp"
#include "solarcast/engines/trees.hpp"

namespace solarcast {

inline std::unique_ptr<quantile_engine> make_engine(std::string_view name,
                                                    const engine_hyper& hp) {
  hp.validate();
  if (name == "ga")
    return std::make_unique<parametric_engine>(param_family::gamma_family, hp);
  if (name == "notr")
    return std::make_unique<parametric_engine>(param_family::truncnorm_family, hp);
  if (name == "qr") return std::make_unique<qr_engine>(hp);
  if (name == "mcqrnn") return std::make_unique<mcqrnn_engine>(hp);
  if (name == "qrf") return std::make_unique<forest_engine>(hp, false);
  if (name == "grf") return std::make_unique<forest_engine>(hp, true);
  if (name == "gbdt") return std::make_unique<gbdt_engine>(hp);
  throw usage_error("unknown engine: " + std::string(name));
}

}  // namespace solarcast

#endif  // SOLARCAST_ENGINES_FACTORY_HPP_
