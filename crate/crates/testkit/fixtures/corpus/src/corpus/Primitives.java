package corpus;

public class Primitives {
    static boolean flag;
    static byte b = 1;
    static short sh = 2;
    static char ch = 'c';
    static int i = 4;
    static long l = 5L;
    static float f = 6.5f;
    static double d = 7.25;

    static double mix() {
        return b + sh + ch + i + l + f + d;
    }

    static long big() {
        return 123456789012L + Long.MAX_VALUE / 3;
    }

    static int compareAll(long a, long c, float x, float y, double p, double q) {
        int r = 0;
        if (a < c) r |= 1;
        if (x > y) r |= 2;
        if (p <= q) r |= 4;
        if (Double.isNaN(p)) r |= 8;
        return r;
    }

    static int[] widen(byte[] bs) {
        int[] out = new int[bs.length];
        for (int k = 0; k < bs.length; k++) out[k] = bs[k] & 0xff;
        return out;
    }

    static char[] upper(char[] cs) {
        char[] out = new char[cs.length];
        for (int k = 0; k < cs.length; k++) out[k] = Character.toUpperCase(cs[k]);
        return out;
    }

    static boolean[] negate(boolean[] bs) {
        boolean[] out = new boolean[bs.length];
        for (int k = 0; k < bs.length; k++) out[k] = !bs[k];
        return out;
    }

    static float[] scale(float[] xs, float k) {
        float[] out = new float[xs.length];
        for (int j = 0; j < xs.length; j++) out[j] = xs[j] * k;
        return out;
    }

    static short[] halve(short[] xs) {
        short[] out = new short[xs.length];
        for (int j = 0; j < xs.length; j++) out[j] = (short) (xs[j] / 2);
        return out;
    }
}
