#include <cstdio>
int main() { std::puts("voltsite"); return 0; }
