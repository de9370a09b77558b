// End-to-end run on synthetic data: learn A, fit the separator, print the certificate.

#include <simlearn/bounds.hpp>
#include <simlearn/data.hpp>
#include <simlearn/format.hpp>
#include <simlearn/separator.hpp>
#include <simlearn/similarity.hpp>

#include <iostream>

int main() {
    using namespace simlearn;

    GeneratorSpec spec;
    spec.d    = 5;
    spec.seed = 7;
    const Dataset train = generate(spec, 200);
    spec.seed           = 8;
    const Dataset holdout = generate(spec, 5000);

    for (NormKind kind : all_norm_kinds) {
        SimilarityConfig cfg;
        cfg.norm_kind = kind;
        cfg.lambda    = 0.1;

        const SimilarityModel model = train_similarity(train, cfg);
        const Separator sep         = train_separator(model, train, SeparatorConfig{});
        const BoundReport rep       = build_bound_report(model, train, 0.05, 2000, 1);

        std::cout << to_string(kind) << ": objective " << format_double(model.final_objective)
                  << ", similarity error train/holdout " << format_double(rep.e_z) << " / "
                  << format_double(true_similarity_error(model.a, holdout, cfg.margin)) << ", bound1 "
                  << format_double(rep.theorem1_bound) << ", separator 0-1 holdout "
                  << format_double(zero_one_error(sep, holdout)) << '\n';
    }
}
