#pragma once

// Frozen question/answer pairs shared by the unit and acceptance tests.

#include <array>
#include <string_view>

namespace fixtures {

struct QuestionCase {
    std::string_view question;
    std::string_view expected_json;
};

inline constexpr std::array<QuestionCase, 5> kReferenceQuestions{{
    {"Does the disaster_risk_reduction.csv dataset provide evidence of a direct link between building code "
     "compliance rate and the effectiveness of disaster preparedness campaigns?",
     R"({"causal_problem":["CSL","CGL"],"dataset":["disaster_risk_reduction.csv"],"nodes":["building_code_compliance_rate","disaster_preparedness_campaigns"]})"},
    {"How does the labor force participation rate (labor_participation_rate) in employment.csv contribute to "
     "changes in wage growth (wage_increase)?",
     R"({"causal_problem":["CEL","ATE"],"dataset":["employment.csv"],"treatment":["labor_participation_rate"],"response":["wage_increase"]})"},
    {"Based on the findings in the cybersecurity.csv dataset, what impact does the presence of data breach "
     "incidents have on cybersecurity investment under a group condition where the cybersecurity readiness index "
     "is set at 0.5 (readiness_index=0.5)?",
     R"({"causal_problem":["CEL","HTE"],"dataset":["cybersecurity.csv"],"treatment":["data_breach_incidents"],"response":["cybersecurity_investment"],"condition":[["readiness_index",0.5]]})"},
    {"Is there substantial evidence in retail.csv indicating that the pathway from retail employment to the "
     "e-commerce penetration rate is mediated by the consumer confidence index?",
     R"({"causal_problem":["CEL","MA"],"dataset":["retail.csv"],"treatment":["retail_employment"],"response":["e-commerce_penetration_rate"],"mediator":["consumer_confidence_index"]})"},
    {"If the poverty rate stands at 0.32 (poverty_ratio = 0.32), what recommendations can be derived from the "
     "poverty.csv dataset on adjusting social assistance coverage to positively impact the gini coefficient?",
     R"({"causal_problem":["CPL","OPO"],"dataset":["poverty.csv"],"treatment":["social_assistance_coverage"],"response":["gini_coefficient"],"condition":[["poverty_ratio",0.32]]})"},
}};

// Filled summary examples; the MA and CGL texts are given with the spacing
// and line joins a reader would restore.
inline constexpr std::string_view kSummaryCgl =
    "There are 3 pairs of significant causal relationships. The gender_index would causally influence the "
    "diversity_index. The gender_index would causally influence the LGBTQ_inclusion. The "
    "disability_inclusion_index would causally influence the LGBTQ_inclusion.";
inline constexpr std::string_view kSummaryAte =
    "The average treatment effect of setting homeownership_rate as 1 on the affordability_index is 0.45.";
inline constexpr std::string_view kSummaryHte =
    "The heterogeneous treatment effect of setting professional_athlete_salaries as 1 on the event_attendance is "
    "-1.41 for those having medal_tally = 0.79.";
inline constexpr std::string_view kSummaryMa =
    "The overall impact of the age_distribution on the gender_ratio is 16.17. This comprises a direct effect of "
    "9.43 from the age_distribution to the gender_ratio, and an indirect effect of 6.74, mediated by the "
    "migration_speed.";
inline constexpr std::string_view kSummaryOpo =
    "The best action of the professional_athlete_salaries is professional_athlete_salaries = C.";

}  // namespace fixtures
