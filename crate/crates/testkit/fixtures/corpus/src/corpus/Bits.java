package corpus;

public class Bits {
    public static int popcount(int x) {
        int n = 0;
        while (x != 0) {
            x &= x - 1;
            n++;
        }
        return n;
    }

    public static int reverseBits(int x) {
        int r = 0;
        for (int i = 0; i < 32; i++) {
            r = (r << 1) | (x & 1);
            x >>>= 1;
        }
        return r;
    }

    public static long rotl(long x, int k) {
        return (x << k) | (x >>> (64 - k));
    }

    public static boolean isPowerOfTwo(long x) {
        return x > 0 && (x & (x - 1)) == 0;
    }

    public static int parity(byte b) {
        int x = b & 0xff;
        x ^= x >> 4;
        x ^= x >> 2;
        x ^= x >> 1;
        return x & 1;
    }

    static class BitSet64 {
        private long bits;

        void set(int i) {
            bits |= 1L << i;
        }

        void clear(int i) {
            bits &= ~(1L << i);
        }

        boolean get(int i) {
            return (bits & (1L << i)) != 0;
        }

        int cardinality() {
            return Long.bitCount(bits);
        }
    }
}
