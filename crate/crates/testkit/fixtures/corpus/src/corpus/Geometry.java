package corpus;

public class Geometry {
    static class Point {
        final int x, y;

        Point(int x, int y) {
            this.x = x;
            this.y = y;
        }

        int manhattan(Point o) {
            return Math.abs(x - o.x) + Math.abs(y - o.y);
        }

        public boolean equals(Object o) {
            if (!(o instanceof Point)) return false;
            Point p = (Point) o;
            return p.x == x && p.y == y;
        }

        public int hashCode() {
            return x * 31 + y;
        }
    }

    static class Segment {
        final Point a, b;

        Segment(Point a, Point b) {
            this.a = a;
            this.b = b;
        }

        boolean horizontal() {
            return a.y == b.y;
        }

        long lengthSquared() {
            long dx = b.x - a.x, dy = b.y - a.y;
            return dx * dx + dy * dy;
        }
    }

    static int orientation(Point p, Point q, Point r) {
        long v = (long) (q.y - p.y) * (r.x - q.x) - (long) (q.x - p.x) * (r.y - q.y);
        if (v == 0) return 0;
        return v > 0 ? 1 : 2;
    }

    static boolean inside(Point p, int w, int h) {
        return p.x >= 0 && p.y >= 0 && p.x < w && p.y < h;
    }
}
