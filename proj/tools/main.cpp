#include "invbayes/cli/cli.hpp"

int main(int argc, char** argv) {
    return invbayes::cli::run_cli(argc, argv);
}
