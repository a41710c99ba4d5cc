#include <pybind11/pybind11.h>
int placeholder_module;
