#include "sake/records.hpp"

#include <string>

#include "sake/errors.hpp"

namespace sake {

std::string_view category_name(Category c) noexcept {
    switch (c) {
        case Category::EditPrompt: return "edit_prompt";
        case Category::Paraphrase: return "paraphrase";
        case Category::CI: return "ci";
        case Category::CII: return "cii";
        case Category::SA: return "sa";
        case Category::RS: return "rs";
        case Category::Unrelated: return "unrelated";
    }
    return "unrelated";
}

Category parse_category(std::string_view name) {
    for (Category c : kAllCategories) {
        if (category_name(c) == name) return c;
    }
    fail(ErrorKind::SchemaViolation, "unknown category '" + std::string(name) + "'");
}

bool is_in_scope(Category c) noexcept { return c != Category::RS && c != Category::Unrelated; }

std::string_view role_name(Role r) noexcept {
    switch (r) {
        case Role::Source: return "source";
        case Role::Target: return "target";
        case Role::Eval: return "eval";
    }
    return "eval";
}

Role parse_role(std::string_view name) {
    if (name == "source") return Role::Source;
    if (name == "target") return Role::Target;
    if (name == "eval") return Role::Eval;
    fail(ErrorKind::SchemaViolation, "unknown role '" + std::string(name) + "'");
}

void ActivationSet::validate() const {
    if (dim <= 0 || scope_dim <= 0) fail(ErrorKind::SchemaViolation, "line 1: dim and scope_dim must be positive");
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const std::string where = "line " + std::to_string(i + 2) + ": ";
        if (r.vector.size() != dim) {
            fail(ErrorKind::SchemaViolation, where + "vector has length " + std::to_string(r.vector.size()) +
                                                 ", header dim is " + std::to_string(dim));
        }
        if (!r.vector.allFinite()) fail(ErrorKind::SchemaViolation, where + "vector contains non-finite values");
        if (r.scope_vector) {
            if (r.scope_vector->size() != scope_dim) {
                fail(ErrorKind::SchemaViolation, where + "scope_vector has length " +
                                                     std::to_string(r.scope_vector->size()) +
                                                     ", header scope_dim is " + std::to_string(scope_dim));
            }
            if (!r.scope_vector->allFinite()) {
                fail(ErrorKind::SchemaViolation, where + "scope_vector contains non-finite values");
            }
        } else if (scope_dim != dim) {
            fail(ErrorKind::SchemaViolation, where + "scope_vector omitted but scope_dim != dim");
        }
    }
}

std::vector<Vector> ActivationSet::vectors(std::optional<std::size_t> limit) const {
    const std::size_t n = limit ? std::min(*limit, records.size()) : records.size();
    std::vector<Vector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(records[i].vector);
    return out;
}

std::vector<Vector> ActivationSet::scope_vectors(std::optional<std::size_t> limit) const {
    const std::size_t n = limit ? std::min(*limit, records.size()) : records.size();
    std::vector<Vector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(records[i].scope());
    return out;
}

std::vector<PromptRecord> to_prompt_records(const ActivationSet& set) {
    std::vector<PromptRecord> out;
    for (const auto& r : set.records) {
        if (r.role != Role::Eval) continue;
        if (!r.expected_pre_edit || !r.expected_post_edit) {
            fail(ErrorKind::SchemaViolation, "eval record '" + r.id + "' lacks expected labels");
        }
        out.push_back(PromptRecord{r.id, r.category, r.vector, r.scope(), *r.expected_pre_edit,
                                   *r.expected_post_edit});
    }
    return out;
}

}  // namespace sake
