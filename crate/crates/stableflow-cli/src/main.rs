fn main() {
    // Command dispatch lands after the library stabilizes.
}
