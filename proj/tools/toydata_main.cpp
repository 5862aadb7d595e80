#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "toyworld.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Writes a synthetic multilingual data set and pipeline config"};
    std::string dir;
    xling::toy::ToyWorldOptions opt;
    app.add_option("dir", dir, "Output directory")->required();
    app.add_option("--seed", opt.seed, "Generator seed")->capture_default_str();
    app.add_option("--concepts", opt.concepts, "Shared vocabulary size")->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    try {
        xling::toy::write_toy_world(dir, opt);
    } catch (const std::exception& e) {
        std::cerr << "xling-toydata: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
