#include <iostream>

#include "hazardchat/service.hpp"

int main(int argc, char** argv) {
    return hazardchat::service::run_cli(argc, argv, std::cout, std::cerr, std::cin);
}
