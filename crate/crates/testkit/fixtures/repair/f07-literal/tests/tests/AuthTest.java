package tests;

public class AuthTest {
    public static boolean rightPin() {
        return app.Auth.checkPin("1234");
    }

    public static boolean wrongPin() {
        return !app.Auth.checkPin("0000");
    }
}
