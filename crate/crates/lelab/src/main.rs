fn main() {
    std::process::exit(lelab::run(std::env::args_os()));
}
