#include "ssid/cli.hpp"

int main(int argc, char** argv) { return ssid::cli_main(argc, argv); }
