fn main() {
    std::process::exit(randhull::app::run(std::env::args()));
}
