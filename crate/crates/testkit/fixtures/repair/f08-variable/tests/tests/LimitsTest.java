package tests;

public class LimitsTest {
    public static boolean below() {
        return app.Limits.clamp(3, 10) == 3;
    }

    public static boolean equal() {
        return app.Limits.clamp(10, 10) == 10;
    }

    public static boolean above() {
        return app.Limits.clamp(15, 10) == 10;
    }
}
