fn main() { std::process::exit(ea4rca::cli::main()) }
