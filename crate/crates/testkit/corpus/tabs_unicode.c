/* Größe — naïve “unicode” comment with a stray } */
int größe(int n) {
	int r = 0;
	while (n > 0) {
		r += n % 10;	// Σ digits
		n /= 10;
	}
	return r;
}

const char *greeting = "héllo {wörld}";
char brace = '}';
