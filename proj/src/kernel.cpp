#include "blaspe/kernel.hpp"

#include <array>
#include <string>
#include <utility>

#include "blaspe/errors.hpp"

namespace blaspe {

namespace {

constexpr std::array<std::pair<KernelKind, std::string_view>, 8> kNames{{
    {KernelKind::ddot, "ddot"},
    {KernelKind::dnrm2, "dnrm2"},
    {KernelKind::daxpy, "daxpy"},
    {KernelKind::gemv, "gemv"},
    {KernelKind::gemm, "gemm"},
    {KernelKind::smm2x2, "smm2x2"},
    {KernelKind::wmm2x2, "wmm2x2"},
    {KernelKind::gemm2x2, "gemm2x2"},
}};

}  // namespace

std::string_view kernel_name(KernelKind k) {
  for (const auto& [kind, name] : kNames)
    if (kind == k) return name;
  return "?";
}

KernelKind parse_kernel(std::string_view name) {
  for (const auto& [kind, n] : kNames)
    if (n == name) return kind;
  throw ShapeError("unknown kernel '" + std::string(name) + "'");
}

bool is_pe_kernel(KernelKind k) {
  switch (k) {
    case KernelKind::ddot:
    case KernelKind::dnrm2:
    case KernelKind::daxpy:
    case KernelKind::gemv:
    case KernelKind::gemm:
      return true;
    default:
      return false;
  }
}

}  // namespace blaspe
