// Finds the translate carrying a five-word set into an independent set of length 7.

#include <forcelab/gf2.hpp>

#include <iostream>

using namespace forcelab;

int main() {
    const WordSet B = WordSet::of({"1000000", "0100000", "0010000", "0001000", "0000100", "0000010", "0000001"});
    const BitWord x = BitWord::from_string("1100000");

    std::vector<BitWord> shifted;
    for (std::size_t i = 0; i < 5; ++i) shifted.push_back(B[i] + x);
    const WordSet A(7, shifted);

    std::cout << "A:";
    for (const auto& a : A) std::cout << ' ' << a.str();
    std::cout << "\nunique translate: " << unique_translate(A, B).str() << '\n';
    std::cout << "exhaustive scan:";
    for (const auto& y : brute_force_translate(A, B)) std::cout << ' ' << y.str();
    std::cout << '\n';

    // Dropping below five words loses uniqueness.
    const WordSet small(7, {shifted.begin(), shifted.begin() + 2});
    std::cout << "two words admit " << brute_force_translate(small, B).size() << " translates\n";
    try {
        unique_translate(small, B);
    } catch (const precondition_error& e) {
        std::cout << "refused: " << e.what() << '\n';
    }
}
