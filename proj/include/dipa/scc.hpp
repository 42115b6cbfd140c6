#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

namespace dipa {

struct SccResult {
    std::vector<int> comp;  // component id per vertex
    int count = 0;
    // Component ids are assigned in completion order, which is a reverse
    // topological order of the condensation: every edge u -> v between
    // different components has comp[u] > comp[v].
};

// Iterative Tarjan over vertices [0, n).  `succ(v, f)` must call f(w) for
// every successor w of v.  Only vertices reachable from `roots` are visited;
// the others get comp = -1.
template <class Succ>
[[nodiscard]] SccResult tarjan_scc(int n, const std::vector<int>& roots, Succ&& succ) {
    SccResult res;
    res.comp.assign(n, -1);
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    int counter = 0;

    struct Frame {
        int v;
        std::vector<int> kids;
        std::size_t next;
    };
    std::vector<Frame> call;

    auto push = [&](int v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = 1;
        Frame f{v, {}, 0};
        succ(v, [&](int w) { f.kids.push_back(w); });
        call.push_back(std::move(f));
    };

    for (int r : roots) {
        if (r < 0 || r >= n || index[r] >= 0) continue;
        push(r);
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.next < f.kids.size()) {
                int w = f.kids[f.next++];
                if (index[w] < 0) {
                    push(w);
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
                continue;
            }
            int v = f.v;
            if (low[v] == index[v]) {
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    res.comp[w] = res.count;
                } while (w != v);
                ++res.count;
            }
            call.pop_back();
            if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
        }
    }
    return res;
}

}  // namespace dipa
