// Builds a small model, stops a Weyl cocycle at the first-arrival time and
// prints a few residuals plus the stop time as JSON.
#include <iostream>

#include "fockstop/fockstop.hpp"

using namespace fockstop;

int main() {
    const Model m(ModelParams{1.0, 3, 2, 1, 2});
    const StopTime s = first_arrival(m);
    std::cout << "model " << describe(m.params()) << ", ambient dim " << m.ambient_dim() << "\n";
    std::cout << "axiom residual        " << validate(s, 1e-10).max_residual() << "\n";

    const Matrix es = time_projection_ES(s).matrix();
    std::cout << "E_S projection        " << projection_residual(es) << "\n";

    const StrongMarkov js(s);
    std::cout << "j_S isometry          " << isometry_residual(js.matrix()) << "\n";

    Vector c(1);
    c << cplx(0.3, 0.1);
    const Cocycle w = weyl_cocycle(m, c);
    const Operator vs = stop_cocycle(w, s);
    std::cout << "V_S isometry          " << isometry_residual(vs.matrix()) << "\n";

    std::cout << io::to_json(s).dump().substr(0, 120) << "...\n";
    return 0;
}
