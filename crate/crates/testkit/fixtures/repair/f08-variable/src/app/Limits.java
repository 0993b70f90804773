package app;

public class Limits {
    public static int clamp(int value, int limit) {
        int r = value;
        if (value > limit) {
            r = value;
        }
        return r;
    }
}
