#pragma once

#include <string>
#include <vector>

#include "randomgrids/kernels.hpp"

namespace rgrids {

// The three built-in test problems. Each returns a fully wired ModelSpec
// including its reference expectation (closed form where one exists, a frozen
// high-accuracy run otherwise; see the provenance string).
ModelSpec make_ode_logistic();
ModelSpec make_sde_quadratic();
ModelSpec make_pdmp_tcp();

const std::vector<std::string>& builtin_model_ids();
ModelSpec make_model(const std::string& id);  // throws std::invalid_argument on unknown id

// Which one-step kernels a model supports, and the one used when the caller
// does not say. Deterministic and diffusion models take "euler" or
// "ninomiya-victoir"; jump models take "pdmp" only.
std::vector<std::string> supported_kernels(const ModelSpec& model);
std::string default_kernel(const ModelSpec& model);

}  // namespace rgrids
