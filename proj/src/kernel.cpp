#include "hittimes/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace hittimes {

namespace {

// Count connected components of the support graph given symmetric triplets.
int component_count(Index n, const std::vector<WeightedEdge>& sym) {
    std::vector<std::vector<Index>> adj(n);
    for (const auto& e : sym) {
        if (e.u != e.v) {
            adj[e.u].push_back(e.v);
            adj[e.v].push_back(e.u);
        }
    }
    std::vector<char> seen(n, 0);
    int comps = 0;
    std::vector<Index> stack;
    for (Index s = 0; s < n; ++s) {
        if (seen[s]) continue;
        ++comps;
        seen[s] = 1;
        stack.push_back(s);
        while (!stack.empty()) {
            Index x = stack.back();
            stack.pop_back();
            for (Index y : adj[x])
                if (!seen[y]) {
                    seen[y] = 1;
                    stack.push_back(y);
                }
        }
    }
    return comps;
}

}  // namespace

MarkovKernel MarkovKernel::from_conductances(Index n, std::span<const WeightedEdge> edges) {
    if (n < 2) throw std::invalid_argument("kernel needs at least 2 vertices");
    // Normalize to upper-triangle keys and detect conflicting duplicates.
    std::vector<WeightedEdge> sym;
    sym.reserve(edges.size());
    for (const auto& e : edges) {
        if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
            throw std::invalid_argument("edge (" + std::to_string(e.u) + "," +
                                        std::to_string(e.v) + ") out of range");
        if (!(e.w > 0.0) || !std::isfinite(e.w))
            throw std::invalid_argument("edge (" + std::to_string(e.u) + "," +
                                        std::to_string(e.v) + ") has nonpositive weight");
        WeightedEdge f = e;
        if (f.u > f.v) std::swap(f.u, f.v);
        sym.push_back(f);
    }
    std::sort(sym.begin(), sym.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    for (std::size_t i = 1; i < sym.size(); ++i) {
        if (sym[i].u == sym[i - 1].u && sym[i].v == sym[i - 1].v &&
            sym[i].w != sym[i - 1].w)
            throw std::invalid_argument(
                "conflicting weights for pair (" + std::to_string(sym[i].u) + "," +
                std::to_string(sym[i].v) + ")");
    }
    sym.erase(std::unique(sym.begin(), sym.end(),
                          [](const WeightedEdge& a, const WeightedEdge& b) {
                              return a.u == b.u && a.v == b.v && a.w == b.w;
                          }),
              sym.end());

    int comps = component_count(n, sym);
    if (comps != 1)
        throw std::invalid_argument("support graph is disconnected (" +
                                    std::to_string(comps) + " components)");

    MarkovKernel k;
    k.finalize_from_triplets(n, std::move(sym));
    return k;
}

void MarkovKernel::finalize_from_triplets(Index n, std::vector<WeightedEdge>&& sym) {
    n_ = n;
    // Per-row entry counts; the diagonal slot is always materialized.
    std::vector<std::size_t> count(n, 1);  // 1 for the diagonal
    for (const auto& e : sym) {
        if (e.u != e.v) {
            ++count[e.u];
            ++count[e.v];
        }
    }
    row_ptr_.assign(n + 1, 0);
    for (Index x = 0; x < n; ++x) row_ptr_[x + 1] = row_ptr_[x] + count[x];
    col_.assign(row_ptr_[n], 0);
    val_.assign(row_ptr_[n], 0.0);

    std::vector<std::size_t> fill(n, 0);
    auto push = [&](Index x, Index y, double w) {
        std::size_t slot = row_ptr_[x] + fill[x]++;
        col_[slot] = y;
        val_[slot] = w;
    };
    // Rows get entries in ascending column order: emit all (x,y) pairs
    // sorted by (x, y).  Build a merged directed list first.
    std::vector<WeightedEdge> directed;
    directed.reserve(sym.size() * 2 + static_cast<std::size_t>(n));
    std::vector<double> diag_w(n, 0.0);
    for (const auto& e : sym) {
        if (e.u == e.v)
            diag_w[e.u] = e.w;
        else {
            directed.push_back({e.u, e.v, e.w});
            directed.push_back({e.v, e.u, e.w});
        }
    }
    for (Index x = 0; x < n; ++x) directed.push_back({x, x, diag_w[x]});
    std::sort(directed.begin(), directed.end(),
              [](const WeightedEdge& a, const WeightedEdge& b) {
                  return a.u != b.u ? a.u < b.u : a.v < b.v;
              });
    for (const auto& e : directed) push(e.u, e.v, e.w);

    diag_.assign(n, 0);
    strength_.assign(n, 0.0);
    total_ = 0.0;
    for (Index x = 0; x < n; ++x) {
        double s = 0.0;
        bool have_diag = false;
        for (std::size_t i = row_ptr_[x]; i < row_ptr_[x + 1]; ++i) {
            s += val_[i];
            if (col_[i] == x) {
                diag_[x] = i;
                have_diag = true;
            }
        }
        if (!have_diag) throw std::logic_error("missing diagonal slot");
        if (!(s > 0.0))
            throw std::invalid_argument("vertex " + std::to_string(x) +
                                        " is isolated (zero strength)");
        strength_[x] = s;
        total_ += s;
    }
}

std::span<const Index> MarkovKernel::neighbors(Index x) const {
    return {col_.data() + row_ptr_[x], row_ptr_[x + 1] - row_ptr_[x]};
}

std::span<const double> MarkovKernel::conductances(Index x) const {
    return {val_.data() + row_ptr_[x], row_ptr_[x + 1] - row_ptr_[x]};
}

double MarkovKernel::conductance(Index x, Index y) const {
    auto cols = neighbors(x);
    auto it = std::lower_bound(cols.begin(), cols.end(), y);
    if (it == cols.end() || *it != y) return 0.0;
    return val_[row_ptr_[x] + static_cast<std::size_t>(it - cols.begin())];
}

double MarkovKernel::transition(Index x, Index y) const {
    return conductance(x, y) / strength_[x];
}

double MarkovKernel::transition_at(Index x, std::size_t slot) const {
    return val_[row_ptr_[x] + slot] / strength_[x];
}

double MarkovKernel::diagonal(Index x) const { return val_[diag_[x]] / strength_[x]; }

std::size_t MarkovKernel::edge_count() const {
    std::size_t offdiag = 0;
    for (Index x = 0; x < n_; ++x)
        for (std::size_t i = row_ptr_[x]; i < row_ptr_[x + 1]; ++i)
            if (col_[i] != x && val_[i] > 0.0) ++offdiag;
    return offdiag / 2;
}

MarkovKernel MarkovKernel::lazify(double eps) const {
    if (!(eps >= 0.0 && eps < 1.0))
        throw std::invalid_argument("laziness must be in [0,1)");
    // c_eps(x,y) = (1-eps) c(x,y) for x != y, and the diagonal absorbs the
    // rest of the row: c_eps(x,x) = (1-eps) c(x,x) + eps s(x).  Strengths and
    // pi are unchanged.
    MarkovKernel k = *this;
    for (Index x = 0; x < n_; ++x) {
        for (std::size_t i = row_ptr_[x]; i < row_ptr_[x + 1]; ++i)
            k.val_[i] = (1.0 - eps) * val_[i];
        k.val_[diag_[x]] += eps * strength_[x];
    }
    // Strengths and total weight are carried over unchanged so pi is
    // preserved bit-for-bit; per-row conductance sums stay within rounding
    // of the retained strengths.
    return k;
}

std::string MarkovKernel::to_edge_list() const {
    std::string out = "vertices " + std::to_string(n_) + "\n";
    char buf[64];
    for (Index x = 0; x < n_; ++x) {
        for (std::size_t i = row_ptr_[x]; i < row_ptr_[x + 1]; ++i) {
            Index y = col_[i];
            if (y < x || val_[i] == 0.0) continue;  // upper triangle, skip empty diag
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n", x, y, val_[i]);
            out += buf;
        }
    }
    return out;
}

MarkovKernel MarkovKernel::from_edge_list(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Index n = -1;
    std::vector<WeightedEdge> edges;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        if (n < 0) {
            std::string tag;
            ls >> tag >> n;
            if (tag != "vertices" || n <= 0)
                throw std::invalid_argument("edge list must start with 'vertices N'");
            continue;
        }
        WeightedEdge e;
        if (!(ls >> e.u >> e.v >> e.w))
            throw std::invalid_argument("bad edge line: " + line);
        edges.push_back(e);
    }
    if (n < 0) throw std::invalid_argument("missing 'vertices N' header");
    return from_conductances(n, edges);
}

std::string MarkovKernel::validate() const {
    for (Index x = 0; x < n_; ++x) {
        double row = 0.0;
        for (std::size_t i = row_ptr_[x]; i < row_ptr_[x + 1]; ++i) {
            row += val_[i] / strength_[x];
            Index y = col_[i];
            double back = conductance(y, x);
            double diff = std::abs(val_[i] - back);
            double scale = std::max(std::abs(val_[i]), std::abs(back));
            if (diff > kReversibilityTol * std::max(1.0, scale))
                return "detailed balance broken at (" + std::to_string(x) + "," +
                       std::to_string(y) + ")";
        }
        if (std::abs(row - 1.0) > kRowSumTol)
            return "row " + std::to_string(x) + " sums to " + std::to_string(row);
    }
    return {};
}

}  // namespace hittimes
