fn main() {
    std::process::exit(semicov::run(std::env::args_os()));
}
