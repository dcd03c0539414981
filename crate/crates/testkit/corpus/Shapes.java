interface Shape {
    double area();
}

class Circle implements Shape {
    private final double r;

    Circle(double r) { this.r = r; }

    public double area() {
        return Math.PI * r * r;
    }
}

class Grid {
    int[][] cells = new int[8][8];

    int countAlive() {
        int alive = 0;
        for (int y = 0; y < 8; y++) {
            for (int x = 0; x < 8; x++) {
                if (cells[y][x] != 0) {
                    alive++;
                }
            }
        }
        return alive;
    }

    void step() {
        int[][] next = new int[8][8];
        for (int y = 0; y < 8; y++) {
            for (int x = 0; x < 8; x++) {
                int n = neighbours(x, y);
                /* rules: } survives with 2 or 3 */
                if (cells[y][x] != 0 && (n == 2 || n == 3)) {
                    next[y][x] = 1;
                } else if (cells[y][x] == 0 && n == 3) {
                    next[y][x] = 1;
                }
            }
        }
        cells = next;
    }

    int neighbours(int x, int y) {
        int n = 0;
        for (int dy = -1; dy <= 1; dy++) {
            for (int dx = -1; dx <= 1; dx++) {
                if (dx == 0 && dy == 0) continue;
                int yy = (y + dy + 8) % 8, xx = (x + dx + 8) % 8;
                n += cells[yy][xx];
            }
        }
        return n;
    }
}
