#include <cstdio>
int main() { std::puts("loopsoup cli stub"); return 0; }
