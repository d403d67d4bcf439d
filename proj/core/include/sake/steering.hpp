#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sake/linalg.hpp"
#include "sake/records.hpp"
#include "sake/registry.hpp"

namespace sake {

struct Encoding {
    Vector activation;
    Vector scope_vec;
};

// The model seen by the editor: `encode` produces the last-layer activation
// of the last token (plus the scope-channel vector) and `decode` is the
// unembedding head. Both must be deterministic.
class LanguageModelBackend {
public:
    virtual ~LanguageModelBackend() = default;

    virtual Index activation_dim() const = 0;
    virtual Index scope_dim() const = 0;

    // `generated` holds the labels emitted so far; empty on the first step.
    virtual Encoding encode(const PromptRecord& prompt, std::span<const std::string> generated) const = 0;

    // Labels ranked best first; ties broken by label order.
    virtual std::vector<std::string> decode(const Vector& activation) const = 0;
};

struct SteeringOutcome {
    std::string output_label;  // empty when produced by steer_activation alone
    bool steered = false;
    std::optional<std::string> matched_edit_id;
    Vector pre_map_activation;
    Vector post_map_activation;
};

// Scope check plus map application, without decoding.
SteeringOutcome steer_activation(const Registry& registry, const Vector& activation, const Vector& scope_vec);

// decode(m(encode(x))), with m the matched edit's map or the identity.
SteeringOutcome edited_forward(const LanguageModelBackend& backend, const Registry& registry,
                               const PromptRecord& prompt);

// decode(encode(x)).
std::string unedited_forward(const LanguageModelBackend& backend, const PromptRecord& prompt);

enum class SteeringPolicy { FirstToken, EveryToken };

std::string_view steering_policy_name(SteeringPolicy policy) noexcept;  // "first" | "every"
SteeringPolicy parse_steering_policy(std::string_view name);

// Greedy multi-step generation. FirstToken consults the registry only at the
// first position; EveryToken re-runs the scope check at every step.
std::vector<SteeringOutcome> edited_generate(const LanguageModelBackend& backend, const Registry& registry,
                                             const PromptRecord& prompt, std::size_t steps,
                                             SteeringPolicy policy);

}  // namespace sake
