#include <cstdio>

int main() {
    std::puts("ork: pipeline CLI placeholder");
    return 0;
}
