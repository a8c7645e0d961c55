fn main() {
    std::process::exit(difflb::harness::main());
}
