// Entry point for the tilingaf command-line tool (subcommands wired up in a
// later step).
int main() { return 2; }
