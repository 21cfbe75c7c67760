// Writes qft3.circuit and qft3.mat into the given directory.

#include "sdq/compiler.hpp"
#include "sdq/fileio.hpp"

#include <iostream>

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: gen_qft3 <directory>\n";
        return 2;
    }
    const std::string dir = argv[1];
    try {
        std::string circuit = "# 3-photon quantum Fourier transform, photon 2 most significant.\n"
                              "# H and controlled phases, then the q1/q3 reversal as three CNOTs;\n"
                              "# each CNOT is H cz H and neighbouring single-photon gates are merged.\n";
        circuit += sdq::print_circuit(sdq::qft_circuit(3));
        sdq::write_file_atomic(dir + "/qft3.circuit", circuit);
        sdq::write_file_atomic(dir + "/qft3.mat", "# 8x8 DFT, little-endian basis index, row-major re im\n" +
                                                      sdq::format_matrix(sdq::qft_matrix(3)));
    } catch (const std::exception& e) {
        std::cerr << "gen_qft3: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
