#include "lapext/cli_app.hpp"

int main(int argc, char** argv) {
    return lapext::cli_main(argc, argv);
}
