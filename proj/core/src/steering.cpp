#include "sake/steering.hpp"

#include <string>

#include "sake/errors.hpp"

namespace sake {

SteeringOutcome steer_activation(const Registry& registry, const Vector& activation, const Vector& scope_vec) {
    if (activation.size() != registry.activation_dim()) {
        fail(ErrorKind::DimensionMismatch, "activation has dimension " + std::to_string(activation.size()) +
                                               ", registry expects " + std::to_string(registry.activation_dim()));
    }
    SteeringOutcome out;
    out.pre_map_activation = activation;
    if (const EditEntry* hit = registry.match_scope(scope_vec)) {
        out.steered = true;
        out.matched_edit_id = hit->id;
        out.post_map_activation = hit->map.apply(activation);
    } else {
        out.post_map_activation = activation;
    }
    return out;
}

namespace {

void check_backend(const LanguageModelBackend& backend, const Registry& registry) {
    if (backend.activation_dim() != registry.activation_dim() || backend.scope_dim() != registry.scope_dim()) {
        fail(ErrorKind::DimensionMismatch,
             "backend dimensions (" + std::to_string(backend.activation_dim()) + ", " +
                 std::to_string(backend.scope_dim()) + ") do not match registry (" +
                 std::to_string(registry.activation_dim()) + ", " + std::to_string(registry.scope_dim()) + ")");
    }
}

std::string top_label(const LanguageModelBackend& backend, const Vector& activation) {
    auto ranked = backend.decode(activation);
    if (ranked.empty()) fail(ErrorKind::InvalidArgument, "backend decoded an empty ranking");
    return std::move(ranked.front());
}

}  // namespace

SteeringOutcome edited_forward(const LanguageModelBackend& backend, const Registry& registry,
                               const PromptRecord& prompt) {
    check_backend(backend, registry);
    const Encoding enc = backend.encode(prompt, {});
    SteeringOutcome out = steer_activation(registry, enc.activation, enc.scope_vec);
    out.output_label = top_label(backend, out.post_map_activation);
    return out;
}

std::string unedited_forward(const LanguageModelBackend& backend, const PromptRecord& prompt) {
    return top_label(backend, backend.encode(prompt, {}).activation);
}

std::string_view steering_policy_name(SteeringPolicy policy) noexcept {
    return policy == SteeringPolicy::EveryToken ? "every" : "first";
}

SteeringPolicy parse_steering_policy(std::string_view name) {
    if (name == "first") return SteeringPolicy::FirstToken;
    if (name == "every") return SteeringPolicy::EveryToken;
    fail(ErrorKind::InvalidArgument, "unknown steering policy '" + std::string(name) + "'");
}

std::vector<SteeringOutcome> edited_generate(const LanguageModelBackend& backend, const Registry& registry,
                                             const PromptRecord& prompt, std::size_t steps,
                                             SteeringPolicy policy) {
    check_backend(backend, registry);
    const Registry passthrough(registry.activation_dim(), registry.scope_dim());
    std::vector<SteeringOutcome> outcomes;
    std::vector<std::string> generated;
    for (std::size_t step = 0; step < steps; ++step) {
        const Encoding enc = backend.encode(prompt, generated);
        const bool consult = step == 0 || policy == SteeringPolicy::EveryToken;
        SteeringOutcome out = steer_activation(consult ? registry : passthrough, enc.activation, enc.scope_vec);
        out.output_label = top_label(backend, out.post_map_activation);
        generated.push_back(out.output_label);
        outcomes.push_back(std::move(out));
    }
    return outcomes;
}

}  // namespace sake
