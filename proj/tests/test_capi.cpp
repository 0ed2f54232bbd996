#include "fakebob.h"
int main() { return 0; }
