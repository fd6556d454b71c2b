#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace blaspe {

enum class KernelKind { ddot, dnrm2, daxpy, gemv, gemm, smm2x2, wmm2x2, gemm2x2 };

struct KernelSpec {
  KernelKind kind = KernelKind::gemm;
  std::size_t n = 0;
};

std::string_view kernel_name(KernelKind k);
// Throws ShapeError for an unknown name.
KernelKind parse_kernel(std::string_view name);
// The five kernels that run on the processing element.
bool is_pe_kernel(KernelKind k);

}  // namespace blaspe
