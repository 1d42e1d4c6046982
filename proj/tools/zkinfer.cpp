#include <cstdio>
int main() { std::printf("zkinfer placeholder\n"); return 0; }
