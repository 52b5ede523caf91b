// Builds a genesis condition, extends it by one ordinal and prints both as JSON.

#include <forcelab/construct.hpp>
#include <forcelab/io.hpp>

#include <iostream>

using namespace forcelab;

int main(int argc, char** argv) {
    const IndexedBase ib = io::parse_base_spec(argc > 1 ? argv[1] : "per");
    const Condition p = genesis({0, 2, 5, 7, 10}, ib);
    const Condition q = add_ordinal(p, 12, ib);

    std::cout << "base " << ib.describe() << ": genesis n=" << p.n << " M=" << p.M << ", after add n=" << q.n
              << " M=" << q.M << '\n';
    std::cout << "genesis valid: " << std::boolalpha << validate(p, bundled_model().model(), ib).ok() << '\n';
    std::cout << "extension valid: " << validate(q, bundled_model().model(), ib).ok() << '\n';
    std::cout << "q extends p: " << leq(p, q) << '\n';
    std::cout << io::dump(io::to_json(q));
}
