fn main() -> std::process::ExitCode {
    sentiscope::cli::run()
}
