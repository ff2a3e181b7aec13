#include "slr/variants/variant.h"

#include <array>
#include <stdexcept>
#include <string>

namespace slr {

namespace {

constexpr std::array<std::string_view, 7> kNames = {
    "slr",
    "implicit",
    "explicit",
    "slr_with_explicit",
    "slr_with_implicit",
    "slr_without_latent",
    "baseline",
};

}  // namespace

std::string_view VariantName(VariantKind kind) {
  return kNames[static_cast<std::size_t>(kind)];
}

VariantKind ParseVariant(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<VariantKind>(i);
  }
  throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
}

std::vector<VariantKind> AllVariants() {
  std::vector<VariantKind> all;
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    all.push_back(static_cast<VariantKind>(i));
  }
  return all;
}

Wiring MakeWiring(VariantKind kind, const AgentDims& dims,
                  bool actor_full_history) {
  Wiring w;
  w.kind = kind;
  w.actor_full_history = actor_full_history;
  const bool self_learned = kind == VariantKind::kSlr ||
                            kind == VariantKind::kSlrWithExplicit ||
                            kind == VariantKind::kSlrWithImplicit;
  if (self_learned) {
    w.has_encoder = true;
    w.latent_dim = dims.latent_dim;
    w.has_triplet = true;
  }
  if (kind == VariantKind::kExplicit || kind == VariantKind::kSlrWithExplicit) {
    w.has_encoder = true;
    w.estimate_dim = dims.privileged_dim;
  }
  if (kind == VariantKind::kImplicit || kind == VariantKind::kSlrWithImplicit) {
    w.has_teacher = true;
    w.teacher_dim = dims.teacher_latent_dim;
  }
  return w;
}

}  // namespace slr
