package corpus;

public class Numbers {
    public static double mean(double[] xs) {
        if (xs.length == 0) {
            return Double.NaN;
        }
        double s = 0;
        for (int i = 0; i < xs.length; i++) {
            s += xs[i];
        }
        return s / xs.length;
    }

    public static float clamp(float v, float lo, float hi) {
        if (v < lo) return lo;
        if (v > hi) return hi;
        return v;
    }

    public static long checkedMul(long a, long b) {
        long r = a * b;
        if (a != 0 && r / a != b) {
            throw new ArithmeticException("overflow");
        }
        return r;
    }

    public static int toInt(double d) {
        return (int) d;
    }

    public static short narrow(int v) {
        return (short) v;
    }

    public static char letter(int i) {
        return (char) ('a' + i % 26);
    }

    public static byte lowByte(long v) {
        return (byte) v;
    }

    public static double convert(int i, long l, float f) {
        double d = i;
        d += l;
        d += f;
        return d;
    }

    static class Fraction {
        final int num, den;

        Fraction(int n, int d) {
            int g = Recursion.gcd(Math.abs(n), Math.abs(d));
            num = n / g;
            den = d / g;
        }

        Fraction add(Fraction o) {
            return new Fraction(num * o.den + o.num * den, den * o.den);
        }

        double value() {
            return (double) num / den;
        }
    }
}
