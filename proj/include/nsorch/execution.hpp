#pragma once

namespace nsorch {

/// Selects the reference serial loop or the OpenMP loop for data-parallel
/// kernels (population fitness, independent episodes).
enum class Execution { serial, parallel };

}  // namespace nsorch
