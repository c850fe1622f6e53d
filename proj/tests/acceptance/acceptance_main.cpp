#include "hiernav/hiernav.hpp"
int main() { return 0; }
