package app;

public class Config {
    public static int version() {
        return 2;
    }

    public static boolean allowA() {
        boolean x = true;
        return x;
    }

    public static boolean allowB() {
        boolean x = true;
        return x;
    }
}
