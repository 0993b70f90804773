package app;

public class Totals {
    public static int total(int a, int b) {
        int sum = a + b;
        byte r = (byte) sum;
        return r;
    }
}
