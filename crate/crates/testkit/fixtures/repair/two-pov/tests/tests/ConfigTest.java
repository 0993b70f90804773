package tests;

public class ConfigTest {
    public static boolean version() {
        return app.Config.version() == 2;
    }

    public static boolean denyA() {
        return !app.Config.allowA();
    }

    public static boolean denyB() {
        return !app.Config.allowB();
    }
}
