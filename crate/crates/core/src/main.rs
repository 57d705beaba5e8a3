fn main() {
    std::process::exit(hopf_takens::cli::run(std::env::args_os()));
}
