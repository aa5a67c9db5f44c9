// Generates the shipped TW1 reference table (data/tw1_f1.csv) from the
// Airy-kernel Fredholm determinant. Run once; the hot path only ever reads
// the committed CSV.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mpu/edge.hpp"
#include "mpu/tw1.hpp"

int main(int argc, char** argv) {
    CLI::App app{"TW1 table generator (Airy-kernel Fredholm determinant)"};
    std::string out = "data/tw1_f1.csv";
    double s_min = -10.0, s_max = 7.0, step = 0.01;
    int nodes = 96;
    app.add_option("--out", out, "output CSV path");
    app.add_option("--s-min", s_min, "left end of the grid");
    app.add_option("--s-max", s_max, "right end of the grid");
    app.add_option("--step", step, "grid spacing");
    app.add_option("--nodes", nodes, "Gauss-Legendre nodes per determinant");
    CLI11_PARSE(app, argc, argv);

    try {
        const auto pts = mpu::tw1_reference_points(s_min, s_max, step, nodes);
        std::vector<double> s, f;
        s.reserve(pts.size());
        f.reserve(pts.size());
        for (const auto& [si, fi] : pts) {
            s.push_back(si);
            f.push_back(fi);
        }
        const mpu::TW1Table table = mpu::TW1Table::from_points(s, f);
        table.save_csv(out);
        std::fprintf(stderr, "wrote %zu rows to %s\n", s.size(), out.c_str());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
