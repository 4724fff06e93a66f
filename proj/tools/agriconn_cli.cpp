#include <cstdio>

int main() {
    std::puts("agriconn: pipeline CLI (work in progress)");
    return 0;
}
