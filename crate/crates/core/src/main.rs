fn main() -> std::process::ExitCode {
    bingham::cli::main()
}
