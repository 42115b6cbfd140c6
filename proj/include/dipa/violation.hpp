#pragma once

#include <string>
#include <vector>

namespace dipa {

enum class ViolationKind { leaking_cycle, leaking_pair, disclosing_cycle, privacy_violating_path };

[[nodiscard]] inline const char* short_name(ViolationKind k) {
    switch (k) {
        case ViolationKind::leaking_cycle: return "LC";
        case ViolationKind::leaking_pair: return "LP";
        case ViolationKind::disclosing_cycle: return "DC";
        case ViolationKind::privacy_violating_path: return "PV";
    }
    return "?";
}

// Half-open range [begin, end) of run positions.
struct Span {
    int begin = 0;
    int end = 0;
    [[nodiscard]] bool contains(int i) const { return begin <= i && i < end; }
    [[nodiscard]] int length() const { return end - begin; }
    friend bool operator==(const Span&, const Span&) = default;
};

// A witness for one of the four well-formedness violations.
//
//   kind   cycles          positions          variables
//   LC     {C}             {assign, use}      {r}
//   LP     {C1, C2}        {k1, km}           {r at k1 (x < r), r at km (x >= r)}
//   DC     {C}             {output}           {}
//   PV     {C}             {k1, km}           {r on the cycle guard}
//
// For PV, `pv_case` is 'a' when k1 outputs x and km lies on C, and 'b' when
// k1 lies on C and km outputs x.
struct Violation {
    ViolationKind kind = ViolationKind::leaking_cycle;
    std::vector<int> run;
    std::vector<Span> cycles;
    std::vector<int> positions;
    std::vector<int> variables;
    char pv_case = 0;
    friend bool operator==(const Violation&, const Violation&) = default;
};

}  // namespace dipa
