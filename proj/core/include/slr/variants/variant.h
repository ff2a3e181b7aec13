#ifndef SLR_VARIANTS_VARIANT_H_
#define SLR_VARIANTS_VARIANT_H_

#include <string_view>
#include <vector>

namespace slr {

enum class VariantKind {
  kSlr,
  kImplicit,
  kExplicit,
  kSlrWithExplicit,
  kSlrWithImplicit,
  kSlrWithoutLatent,
  kBaseline,
};

std::string_view VariantName(VariantKind kind);
// throws std::invalid_argument on unknown names
VariantKind ParseVariant(std::string_view name);
std::vector<VariantKind> AllVariants();

struct AgentDims {
  int obs_dim = 11;
  int action_dim = 2;
  int privileged_dim = 10;
  int history_len = 10;
  int latent_dim = 20;
  int teacher_latent_dim = 8;

  int history_dim() const { return history_len * obs_dim; }

  bool operator==(const AgentDims&) const = default;
};

// Which networks exist and what each network reads.
//
//   encoder phi   history -> [z (latent_dim) | e_hat (estimate_dim)]
//   teacher psi   privileged -> l (teacher_dim)
//   transition mu [z | a] -> z_next, present iff the triplet loss is used
//
//   actor  [o_t or history | sg(z) | sg(e_hat) | l]
//   critic [o_t            |    z  |    e_hat  | l]
struct Wiring {
  VariantKind kind = VariantKind::kSlr;
  bool has_encoder = false;
  int latent_dim = 0;
  int estimate_dim = 0;
  bool has_teacher = false;
  int teacher_dim = 0;
  bool has_triplet = false;
  bool actor_full_history = false;

  int encoder_output_dim() const { return latent_dim + estimate_dim; }
  int extra_dim() const { return latent_dim + estimate_dim + teacher_dim; }
  int actor_input_dim(const AgentDims& d) const {
    return (actor_full_history ? d.history_dim() : d.obs_dim) + extra_dim();
  }
  int critic_input_dim(const AgentDims& d) const {
    return d.obs_dim + extra_dim();
  }
  bool operator==(const Wiring&) const = default;
};

Wiring MakeWiring(VariantKind kind, const AgentDims& dims,
                  bool actor_full_history = false);

}  // namespace slr

#endif  // SLR_VARIANTS_VARIANT_H_
