#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sake/linalg.hpp"

namespace sake {

// Prompt categories; each one feeds exactly one metric.
enum class Category { EditPrompt, Paraphrase, CI, CII, SA, RS, Unrelated };

inline constexpr std::array<Category, 7> kAllCategories = {
    Category::EditPrompt, Category::Paraphrase, Category::CI, Category::CII,
    Category::SA,         Category::RS,         Category::Unrelated};

std::string_view category_name(Category c) noexcept;  // "edit_prompt", "paraphrase", ...
Category parse_category(std::string_view name);

// Prompts the edit should change (the in-scope input space).
bool is_in_scope(Category c) noexcept;

enum class Role { Source, Target, Eval };

std::string_view role_name(Role r) noexcept;
Role parse_role(std::string_view name);

// A JSON field this library does not interpret, kept as raw JSON text so that
// it survives a read/write cycle unchanged.
using ExtraField = std::pair<std::string, std::string>;

struct ActivationRecord {
    std::string id;
    Role role = Role::Eval;
    Category category = Category::Paraphrase;
    Vector vector;
    std::optional<Vector> scope_vector;  // absent => the activation itself
    std::optional<std::string> expected_pre_edit;
    std::optional<std::string> expected_post_edit;
    std::vector<ExtraField> extra;

    const Vector& scope() const { return scope_vector ? *scope_vector : vector; }
};

struct ActivationSet {
    Index dim = 0;
    Index scope_dim = 0;
    std::vector<ExtraField> header_extra;
    std::vector<ActivationRecord> records;

    // Checks the record invariants against the header; throws SchemaViolation
    // naming the offending record (1-based line number, header = line 1).
    void validate() const;

    std::vector<Vector> vectors(std::optional<std::size_t> limit = std::nullopt) const;
    std::vector<Vector> scope_vectors(std::optional<std::size_t> limit = std::nullopt) const;
};

// Evaluation input: one probe of the (edited) model.
struct PromptRecord {
    std::string prompt_id;
    Category category = Category::Paraphrase;
    Vector activation;
    Vector scope_vec;
    std::string expected_pre_edit;
    std::string expected_post_edit;
};

// Eval-role records of a set as prompt records. Records lacking expected
// labels are rejected with SchemaViolation.
std::vector<PromptRecord> to_prompt_records(const ActivationSet& set);

}  // namespace sake
