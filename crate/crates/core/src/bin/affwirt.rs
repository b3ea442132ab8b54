fn main() {
    std::process::exit(affine_wirtinger::cli::main_with_args(std::env::args_os()));
}
