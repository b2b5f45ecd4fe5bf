// placeholder; real bindings land with the python package
#include <pybind11/pybind11.h>
PYBIND11_MODULE(_ntklab, m) { m.doc() = "ntklab"; }
