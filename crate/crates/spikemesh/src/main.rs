fn main() {
    std::process::exit(spikemesh::cli::run_cli());
}
