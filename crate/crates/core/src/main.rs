fn main() {
    std::process::exit(overlap_lab::cli::run(std::env::args_os()));
}
