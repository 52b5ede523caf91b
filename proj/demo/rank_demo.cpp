// Derivative chain of a small catalog, and splitting ranks in the bundled model.

#include <forcelab/mtuple.hpp>
#include <forcelab/splitrank.hpp>

#include <iostream>

using namespace forcelab;

int main() {
    std::vector<BitWord> top;
    for (std::uint64_t x = 0; x < 8; ++x) top.push_back(BitWord::from_u64(3, x));
    Catalog cat{{FiniteTree(3, WordSet(3, top))}, 3, IndexedBase::finite(1, BaseTag::O0), {}};
    cat.bounds.max_u = 3;
    const DerivativeChain ch = derivative_chain(cat);
    std::cout << "full tree of depth 3, at most 3 nodes\n";
    for (std::size_t s = 0; s < ch.stages.size(); ++s) std::cout << "  stage " << s << ": " << ch.stages[s].size() << '\n';

    RankEvaluator big(bundled_model().model());
    std::cout << "bundled model: rank {0,1} = " << big.rank(ordset_of({0, 1})).str() << '\n';

    const FiniteModel m(4, 3,
                        {{0, 1, {{0}, {2}, {3}}},
                         {0, 2, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}},
                         {0, 3, {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}}});
    RankEvaluator ev(m);
    for (OrdSet w = 1; w < 16; ++w) {
        const Rank r = ev.rank(w);
        std::cout << "rank " << ordset_text(w) << " = " << r.str();
        if (!r.is_infinite()) std::cout << (witness_holds(ev.witness(w), ev) ? " (witness checked)" : " (witness FAILED)");
        std::cout << '\n';
    }
    std::cout << ev.evaluations() << " evaluations, " << ev.memo_size() << " memo entries\n";
}
