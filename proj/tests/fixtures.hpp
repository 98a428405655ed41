#pragma once

// Synthetic stand-ins with the published file layouts, for machines without
// the real Titanic / MNIST downloads.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace fixtures {

/// Kaggle train.csv layout: 12 columns, quoted names with commas, a few
/// missing Age / Embarked values.
inline void write_titanic_csv(const std::filesystem::path& path, int rows = 891, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> cls(1, 3), sib(0, 3), emb(0, 2);
    std::uniform_real_distribution<double> age(1, 70), fare(5, 250), u(0, 1);
    std::ofstream out(path);
    out << "PassengerId,Survived,Pclass,Name,Sex,Age,SibSp,Parch,Ticket,Fare,Cabin,Embarked\n";
    for (int i = 0; i < rows; ++i) {
        const bool female = u(rng) < 0.35;
        const int pclass = cls(rng);
        const bool survived = u(rng) < (female ? 0.74 : 0.19) + (pclass == 1 ? 0.1 : 0.0);
        out << i + 1 << ',' << survived << ',' << pclass << ",\"Passenger" << i << ", " << (female ? "Mrs." : "Mr.")
            << " Test\"," << (female ? "female" : "male") << ',';
        if (u(rng) > 0.2) out << static_cast<int>(age(rng));
        out << ',' << sib(rng) << ',' << sib(rng) % 2 << ",T" << 1000 + i << ',' << fare(rng) << ",,";
        if (i % 400 != 61) out << "SCQ"[emb(rng)];
        out << '\n';
    }
}

inline void put_be32(std::ofstream& o, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    o.write(reinterpret_cast<const char*>(b), 4);
}

/// train-images-idx3-ubyte / train-labels-idx1-ubyte with label-dependent blobs.
inline void write_mnist_idx(const std::filesystem::path& dir, std::uint32_t count = 60000, std::uint64_t seed = 2) {
    std::filesystem::create_directories(dir);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> digit(0, 9), noise(0, 40);
    std::ofstream img(dir / "train-images-idx3-ubyte", std::ios::binary);
    std::ofstream lab(dir / "train-labels-idx1-ubyte", std::ios::binary);
    put_be32(img, 0x803);
    put_be32(img, count);
    put_be32(img, 28);
    put_be32(img, 28);
    put_be32(lab, 0x801);
    put_be32(lab, count);
    std::string pixels(784, '\0');
    for (std::uint32_t i = 0; i < count; ++i) {
        const int d = digit(rng);
        for (int r = 0; r < 28; ++r)
            for (int c = 0; c < 28; ++c) {
                const bool on = std::abs(r - 4 - 2 * d) < 3 && c > 6 && c < 22;
                pixels[r * 28 + c] = static_cast<char>(on ? 200 + noise(rng) : noise(rng));
            }
        img.write(pixels.data(), 784);
        const char l = static_cast<char>(d);
        lab.write(&l, 1);
    }
}

}  // namespace fixtures
