fn main() {
    std::process::exit(texfeat::cli::main_with_exit_code());
}
