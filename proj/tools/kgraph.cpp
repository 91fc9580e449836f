#include <cstdio>

int main() {
    std::puts("kgraph: CLI under construction");
    return 0;
}
