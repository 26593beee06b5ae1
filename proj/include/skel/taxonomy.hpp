#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace skel {

/// The four top-level answers of the "Where are you now?" diary, in the
/// order they are offered to the participant.
enum class MainCategory : std::uint8_t { University = 0, Home = 1, Travelling = 2, Other = 3 };

inline constexpr std::size_t kMainCategoryCount = 4;
inline constexpr std::size_t kSubcategoryCount = 18;

std::string_view to_string(MainCategory c);
std::optional<MainCategory> parse_main_category(std::string_view s);

/// A complete diary answer: one of the 18 subcategories. The main category
/// is implied by the subcategory.
class Label {
public:
    constexpr Label() = default;
    static Label from_index(std::size_t sub);
    /// First subcategory of a main category, used when only the main
    /// category is known (e.g. a main-category model's prediction).
    static Label representative(MainCategory main);
    static std::optional<Label> parse(std::string_view slug);

    constexpr std::size_t index() const { return sub_; }
    MainCategory main() const;
    /// "main/sub" slug, e.g. "home/main_home".
    std::string_view slug() const;
    std::string_view sub_name() const;

    friend constexpr bool operator==(Label, Label) = default;
    friend constexpr auto operator<=>(Label, Label) = default;

private:
    constexpr explicit Label(std::uint8_t sub) : sub_(sub) {}
    std::uint8_t sub_ = 0;
};

/// All subcategories belonging to `main`, in taxonomy order.
std::vector<Label> subcategories_of(MainCategory main);

enum class Granularity : std::uint8_t { MainCategory, Subcategory };

std::string_view to_string(Granularity g);
Granularity parse_granularity(std::string_view s);

using ClassIndex = std::size_t;

/// The class set a model learns over. With main-category granularity the
/// classes are the four main categories; with subcategory granularity
/// they are the 18 subcategories. Class order is taxonomy order, which is
/// also the argmax tie-break order.
class Taxonomy {
public:
    explicit Taxonomy(Granularity g = Granularity::MainCategory) : granularity_(g) {}

    Granularity granularity() const { return granularity_; }
    std::size_t size() const;
    ClassIndex class_of(Label label) const;
    Label label_of(ClassIndex c) const;
    std::string_view class_name(ClassIndex c) const;
    std::optional<ClassIndex> parse_class(std::string_view name) const;
    std::vector<std::string> class_names() const;

    friend bool operator==(const Taxonomy&, const Taxonomy&) = default;

private:
    Granularity granularity_;
};

}  // namespace skel
