#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"airbench: CIFAR-10 speed-training toolkit"};
    app.require_subcommand(0, 1);
    CLI11_PARSE(app, argc, argv);
    return 0;
}
