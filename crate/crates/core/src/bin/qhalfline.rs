fn main() {
    std::process::exit(qhalfline::cli::run(std::env::args_os()));
}
