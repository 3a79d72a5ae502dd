fn main() {
    std::process::exit(geomatch::cli::main_entry());
}
