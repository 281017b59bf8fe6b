#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "invbayes/autodiff/graph.hpp"

namespace invbayes::testing {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
    std::string worst;
};

/**
 * Compares backward() with central differences of step h for every element
 * of every input that receives a gradient. Elements whose perturbation
 * changes the branch signature (a kink inside [x - h, x + h]) are skipped.
 * Relative error is |a - n| / max(|a|, |n|, floor).
 */
inline GradCheckResult gradient_check(ad::Graph& g, ad::NodeId out, ad::NamedTensors inputs, double h = 1e-5,
                                      double floor = 1e-6) {
    ad::Bindings b;
    b.bind_all(inputs);
    g.forward(b, out);
    const auto signature = g.branch_signature();
    const auto grads = g.backward();

    GradCheckResult r;
    for (const auto& [name, grad] : grads) {
        auto it = inputs.find(name);
        if (it == inputs.end()) continue;
        ad::Tensor& x = it->second;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double saved = x[i];
            x[i] = saved + h;
            const double fp = g.forward(b, out).item();
            const auto sp = g.branch_signature();
            x[i] = saved - h;
            const double fm = g.forward(b, out).item();
            const auto sm = g.branch_signature();
            x[i] = saved;
            if (sp != signature || sm != signature) {
                ++r.skipped;
                continue;
            }
            const double numeric = (fp - fm) / (2.0 * h);
            const double analytic = grad[i];
            const double rel =
                std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
            ++r.checked;
            if (rel > r.max_rel_error) {
                r.max_rel_error = rel;
                r.worst = name + "[" + std::to_string(i) + "]";
            }
        }
    }
    g.forward(b, out);
    return r;
}

}  // namespace invbayes::testing
