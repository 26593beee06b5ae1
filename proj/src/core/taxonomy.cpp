#include "skel/taxonomy.hpp"

#include "skel/errors.hpp"

#include <fmt/format.h>

namespace skel {

namespace {

struct SubcategoryInfo {
    MainCategory main;
    std::string_view slug;
};

constexpr std::array<SubcategoryInfo, kSubcategoryCount> kSubcategories{{
    {MainCategory::University, "university/my_faculty"},
    {MainCategory::University, "university/other_faculty"},
    {MainCategory::University, "university/other"},
    {MainCategory::Home, "home/main_home"},
    {MainCategory::Home, "home/weekend_home"},
    {MainCategory::Home, "home/other_peoples_home"},
    {MainCategory::Travelling, "travelling/foot"},
    {MainCategory::Travelling, "travelling/bicycle"},
    {MainCategory::Travelling, "travelling/moped_motorcycle_motorboat"},
    {MainCategory::Travelling, "travelling/passenger_car"},
    {MainCategory::Travelling, "travelling/other_private_transport"},
    {MainCategory::Travelling, "travelling/public_transport"},
    {MainCategory::Other, "other/restaurant_cafe_pub"},
    {MainCategory::Other, "other/shopping"},
    {MainCategory::Other, "other/hotel_guesthouse_camping"},
    {MainCategory::Other, "other/street_square_park"},
    {MainCategory::Other, "other/sports_center"},
    {MainCategory::Other, "other/other"},
}};

constexpr std::array<std::string_view, kMainCategoryCount> kMainNames{
    "university", "home", "travelling", "other"};

}  // namespace

std::string_view to_string(MainCategory c) { return kMainNames[static_cast<std::size_t>(c)]; }

std::optional<MainCategory> parse_main_category(std::string_view s) {
    for (std::size_t i = 0; i < kMainNames.size(); ++i) {
        if (kMainNames[i] == s) return static_cast<MainCategory>(i);
    }
    return std::nullopt;
}

Label Label::from_index(std::size_t sub) {
    if (sub >= kSubcategoryCount) {
        throw UsageError(fmt::format("subcategory index {} out of range", sub));
    }
    return Label(static_cast<std::uint8_t>(sub));
}

Label Label::representative(MainCategory main) {
    for (std::size_t i = 0; i < kSubcategories.size(); ++i) {
        if (kSubcategories[i].main == main) return Label(static_cast<std::uint8_t>(i));
    }
    throw UsageError("unknown main category");
}

std::optional<Label> Label::parse(std::string_view slug) {
    for (std::size_t i = 0; i < kSubcategories.size(); ++i) {
        if (kSubcategories[i].slug == slug) return Label(static_cast<std::uint8_t>(i));
    }
    return std::nullopt;
}

MainCategory Label::main() const { return kSubcategories[sub_].main; }

std::string_view Label::slug() const { return kSubcategories[sub_].slug; }

std::string_view Label::sub_name() const {
    auto s = slug();
    return s.substr(s.find('/') + 1);
}

std::vector<Label> subcategories_of(MainCategory main) {
    std::vector<Label> out;
    for (std::size_t i = 0; i < kSubcategories.size(); ++i) {
        if (kSubcategories[i].main == main) out.push_back(Label::from_index(i));
    }
    return out;
}

std::string_view to_string(Granularity g) {
    return g == Granularity::MainCategory ? "main_category" : "subcategory";
}

Granularity parse_granularity(std::string_view s) {
    if (s == "main_category" || s == "main") return Granularity::MainCategory;
    if (s == "subcategory" || s == "sub") return Granularity::Subcategory;
    throw ConfigError(fmt::format("unknown learn granularity '{}'", s));
}

std::size_t Taxonomy::size() const {
    return granularity_ == Granularity::MainCategory ? kMainCategoryCount : kSubcategoryCount;
}

ClassIndex Taxonomy::class_of(Label label) const {
    return granularity_ == Granularity::MainCategory ? static_cast<ClassIndex>(label.main())
                                                     : label.index();
}

Label Taxonomy::label_of(ClassIndex c) const {
    if (c >= size()) throw UsageError(fmt::format("class index {} out of range", c));
    return granularity_ == Granularity::MainCategory
               ? Label::representative(static_cast<MainCategory>(c))
               : Label::from_index(c);
}

std::string_view Taxonomy::class_name(ClassIndex c) const {
    if (c >= size()) throw UsageError(fmt::format("class index {} out of range", c));
    return granularity_ == Granularity::MainCategory ? kMainNames[c] : kSubcategories[c].slug;
}

std::optional<ClassIndex> Taxonomy::parse_class(std::string_view name) const {
    for (ClassIndex c = 0; c < size(); ++c) {
        if (class_name(c) == name) return c;
    }
    return std::nullopt;
}

std::vector<std::string> Taxonomy::class_names() const {
    std::vector<std::string> out;
    for (ClassIndex c = 0; c < size(); ++c) out.emplace_back(class_name(c));
    return out;
}

}  // namespace skel
