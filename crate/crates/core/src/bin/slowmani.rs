fn main() -> std::process::ExitCode {
    slowmani::cli::main()
}
