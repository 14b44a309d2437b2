fn main() { std::process::exit(rlra::cli::main()) }
