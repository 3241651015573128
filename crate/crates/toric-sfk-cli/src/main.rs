fn main() {
    // Subcommands land once the library surface stabilizes.
    eprintln!("toric-sfk: not yet wired up");
    std::process::exit(2);
}
