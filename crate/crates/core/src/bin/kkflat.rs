fn main() {
    std::process::exit(kkflat::cli::main_with_args(std::env::args_os()));
}
