#include "surveyopt/selection.hpp"

namespace surveyopt {

std::string method_name(Method m) {
    switch (m) {
        case Method::oga: return "oga";
        case Method::lasso: return "lasso";
        case Method::post_lasso: return "post-lasso";
    }
    throw std::logic_error("method_name: bad enum value");
}

Method method_from_name(const std::string& name) {
    if (name == "oga") return Method::oga;
    if (name == "lasso") return Method::lasso;
    if (name == "post-lasso" || name == "post_lasso") return Method::post_lasso;
    throw std::invalid_argument("unknown method '" + name + "'");
}

bool better_design(const Selection& a, const Selection& b) {
    if (a.criterion != b.criterion) return a.criterion < b.criterion;
    if (a.size.effective_n() != b.size.effective_n()) {
        return a.size.effective_n() > b.size.effective_n();
    }
    return a.selected_indices.size() < b.selected_indices.size();
}

DesignResult reduce_design(const SizeGrid& grid, std::vector<std::optional<Selection>>&& slots) {
    DesignResult out;
    out.sweep.reserve(slots.size());
    std::ptrdiff_t best = -1;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i]) {
            out.skipped.push_back(grid.sizes[i]);
            continue;
        }
        out.sweep.push_back(std::move(*slots[i]));
        if (best < 0 || better_design(out.sweep.back(), out.sweep[best])) {
            best = static_cast<std::ptrdiff_t>(out.sweep.size()) - 1;
        }
    }
    if (best < 0) throw InfeasibleError("no grid size is feasible under the budget");
    out.best = out.sweep[best];
    return out;
}

}  // namespace surveyopt
