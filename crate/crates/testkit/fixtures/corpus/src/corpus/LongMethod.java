package corpus;

public class LongMethod {
    public static int churn(int seed) {
        int a = seed, b = seed * 3, c = seed ^ 0x5a5a;
        for (int i = 0; i < 40; i++) {
            a += b * 31 + i; b ^= a >>> 3; c -= a & 0xff;
            a += b * 37 + i; b ^= a >>> 5; c -= a & 0x7f;
            a += b * 41 + i; b ^= a >>> 7; c -= a & 0x3f;
            a += b * 43 + i; b ^= a >>> 2; c -= a & 0x1f;
            a += b * 47 + i; b ^= a >>> 4; c -= a & 0x0f;
            if (c < 0) { c = -c; } else { c += 1; }
            a += b * 53 + i; b ^= a >>> 6; c -= a & 0xff;
            a += b * 59 + i; b ^= a >>> 1; c -= a & 0x7f;
            a += b * 61 + i; b ^= a >>> 3; c -= a & 0x3f;
            a += b * 67 + i; b ^= a >>> 5; c -= a & 0x1f;
            a += b * 71 + i; b ^= a >>> 7; c -= a & 0x0f;
            if (a == b) { break; }
            a += b * 73 + i; b ^= a >>> 2; c -= a & 0xff;
            a += b * 79 + i; b ^= a >>> 4; c -= a & 0x7f;
            a += b * 83 + i; b ^= a >>> 6; c -= a & 0x3f;
            a += b * 89 + i; b ^= a >>> 1; c -= a & 0x1f;
            a += b * 97 + i; b ^= a >>> 3; c -= a & 0x0f;
        }
        return a + b + c;
    }

    public static long wide(long x, double y) {
        long acc = x;
        double d = y;
        for (int i = 0; i < 8; i++) {
            acc = acc * 6364136223846793005L + 1442695040888963407L;
            d = d * 1.0000001 + (acc & 0xffff);
            if (d > 1e12) { d = d / 3.0; }
            acc ^= (long) d;
        }
        return acc;
    }

    static class Table {
        int[] cells = new int[64];

        int sum() {
            int s = 0;
            for (int i = 0; i < cells.length; i++) {
                s += cells[i];
            }
            return s;
        }

        void fill(int v) {
            for (int i = 0; i < cells.length; i++) {
                cells[i] = v + i;
            }
        }
    }
}
