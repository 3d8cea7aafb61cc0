fn main() {
    std::process::exit(inside_money::cli::run(std::env::args_os()));
}
